from cep.cli import main

main()
