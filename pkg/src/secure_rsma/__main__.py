import sys

from secure_rsma.harness.cli import main

sys.exit(main())
