import sys

from qacse.cli import main

sys.exit(main())
