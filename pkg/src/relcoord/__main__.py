from relcoord.cli import main

main()
