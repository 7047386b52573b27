#!/usr/bin/env python3
"""
PeriodicBVP - command-line entry point
"""

import sys
import os

# Add the project root to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.ui.cli_app import main

if __name__ == "__main__":
    sys.exit(main())
