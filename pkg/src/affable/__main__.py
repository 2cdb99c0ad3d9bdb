from affable.cli import main

raise SystemExit(main())
