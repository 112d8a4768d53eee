import sys

from revspam.cli import main

sys.exit(main())
