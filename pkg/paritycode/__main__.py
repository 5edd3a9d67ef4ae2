from paritycode.cli import main

main()
