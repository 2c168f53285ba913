"""Allow ``python -m wtail`` as an alias for the ``wtail`` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
