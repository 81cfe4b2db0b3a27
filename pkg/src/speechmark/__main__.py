import sys

from speechmark.cli import main

sys.exit(main())
