# PUCS command-line interface
