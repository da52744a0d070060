from cm_lab.cli import main


main()
