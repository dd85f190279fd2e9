"""CLI entrypoint for divisio."""

from divisio.cli import load

cli = load()

if __name__ == "__main__":
    cli()
