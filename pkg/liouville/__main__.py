"""Entry point for running liouville as a module.

Allows running with: python -m liouville
"""

import sys
from liouville.cli import main

if __name__ == '__main__':
    sys.exit(main())
