"""Config-driven experiment runner, verification suites, plots and CLI."""
