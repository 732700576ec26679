#!/usr/bin/env python3
"""otfmri command-line entry point"""

import sys

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
