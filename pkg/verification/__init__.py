"""
Verification Package - Acceptance experiments, JSON settings and report writing
"""

from .verification_orchestrator import (
    GRAPHS_DIR, PendingComparison, VerificationOrchestrator, VerificationResult, reference_graph
)

__all__ = ['GRAPHS_DIR', 'PendingComparison', 'VerificationOrchestrator', 'VerificationResult', 'reference_graph']
