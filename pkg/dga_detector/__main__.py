#!/usr/bin/env python3
"""
Entry point for running the detector with: python -m dga_detector
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
