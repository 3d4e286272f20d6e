import sys

from confradius.cli import main

sys.exit(main())
