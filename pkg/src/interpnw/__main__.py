from interpnw.cli import main

main()
