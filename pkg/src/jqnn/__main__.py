import sys

from jqnn.cli import main

sys.exit(main())
