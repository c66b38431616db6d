import sys

from softvqa.cli import main

sys.exit(main())
