"""
Wentzell Package - Vertex boundary data and regime classification
"""

from .wentzell_data import VertexData, WentzellData, WentzellViolationError, validate
from .regime_classifier import RegimeKind, VertexRegime, classify, classify_all

__all__ = ['VertexData', 'WentzellData', 'WentzellViolationError', 'validate',
           'RegimeKind', 'VertexRegime', 'classify', 'classify_all']
