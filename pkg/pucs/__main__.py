"""
Entry point for the PUCS simulator when run as a module.
"""

import sys

from pucs.app import main

if __name__ == "__main__":
    sys.exit(main())
