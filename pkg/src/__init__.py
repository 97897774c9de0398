"""joycekit - numerical checks for Joyce structures and their wall-crossing data."""
