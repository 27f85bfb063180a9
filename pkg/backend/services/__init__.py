"""Config loading, description files, report output and the CLI verbs."""
