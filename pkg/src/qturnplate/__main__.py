import sys

from qturnplate.cli import main

sys.exit(main())
