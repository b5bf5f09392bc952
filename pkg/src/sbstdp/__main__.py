import sys

from sbstdp.harness.cli import main

sys.exit(main())
