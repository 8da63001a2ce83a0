"""
Entry point for `python -m wavetail`.
"""

# Import Python standard libraries
import sys

# Import the library itself
from wavetail.cli import main

sys.exit(main())
