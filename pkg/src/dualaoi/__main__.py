import sys

from dualaoi.cli import main

sys.exit(main())
