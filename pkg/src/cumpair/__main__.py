import sys

from cumpair.cli import main

sys.exit(main())
