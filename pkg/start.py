#!/usr/bin/env python3
"""
Metric Graph Brownian Motion - Main Entry
Runs a command line subcommand when arguments are given, otherwise an interactive menu
"""

import os
import subprocess
import sys
from typing import Dict, List

from cli.command_line import run
from verification.verification_orchestrator import GRAPHS_DIR


class MenuSystem:
    """Interactive menu over the command line subcommands"""

    def __init__(self):
        self.tools = self._initialize_tools()
        self.running = True

    def _initialize_tools(self) -> Dict[str, Dict]:
        return {
            "1": {"name": "🔍 Validate a graph file", "command": "validate", "needs_graph": True},
            "2": {"name": "📐 Solve the resolvent (oracle)", "command": "resolvent", "needs_graph": True},
            "3": {"name": "🎲 Sample paths", "command": "simulate", "needs_graph": True},
            "4": {"name": "🔗 Crossover chain test", "command": "chain-test", "needs_graph": True},
            "5": {"name": "✅ Run the acceptance suite", "command": "verify", "needs_graph": False},
            "6": {"name": "📚 List bundled graphs", "command": None, "needs_graph": False},
            "7": {"name": "🧪 Run Tests", "command": None, "needs_graph": False},
        }

    def display_menu(self):
        print("\n" + "=" * 70)
        print("🎯 METRIC GRAPH BROWNIAN MOTION - MAIN MENU")
        print("=" * 70)
        for key, tool in self.tools.items():
            print(f"{key}. {tool['name']}")
        print("0. Exit")
        print("=" * 70)

    def _bundled_graphs(self) -> List[str]:
        return sorted(name for name in os.listdir(GRAPHS_DIR) if name.endswith(".g"))

    def _ask_graph(self) -> str:
        graphs = self._bundled_graphs()
        for i, name in enumerate(graphs, 1):
            print(f"  {i}. {name}")
        choice = input("Graph number or path: ").strip()
        if choice.isdigit() and 1 <= int(choice) <= len(graphs):
            return os.path.join(GRAPHS_DIR, graphs[int(choice) - 1])
        return choice

    def run_tool(self, choice: str):
        if choice == "0":
            self.running = False
            print("👋 Goodbye!")
            return
        tool = self.tools.get(choice)
        if tool is None:
            print("❌ Invalid choice.")
            return
        if choice == "6":
            for name in self._bundled_graphs():
                print(f"  {name}")
            return
        if choice == "7":
            subprocess.run([sys.executable, "run_tests.py", "--fast"], check=False)
            return

        argv = [tool["command"]]
        if tool["needs_graph"]:
            argv += ["--graph", self._ask_graph()]
        extra = input("Extra flags (Enter for none): ").strip()
        argv += extra.split()
        code = run(argv)
        print(f"{'✅' if code == 0 else '❌'} {tool['command']} finished with exit code {code}")

    def run(self):
        print("🎯 Brownian motion on metric graphs with Wentzell vertex conditions")
        if not os.path.exists('.env'):
            print("\n⚠️  No .env file found; using built-in defaults (see env_template.txt).")
        while self.running:
            try:
                self.display_menu()
                self.run_tool(input("Select an option: ").strip())
            except (KeyboardInterrupt, EOFError):
                print("\n\n👋 Goodbye!")
                break


def main():
    if len(sys.argv) > 1:
        sys.exit(run(sys.argv[1:]))
    MenuSystem().run()


if __name__ == "__main__":
    main()
