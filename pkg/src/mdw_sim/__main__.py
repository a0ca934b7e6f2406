"""
Allows `python -m mdw_sim`.
"""

import sys

from .cli import main

sys.exit(main())
