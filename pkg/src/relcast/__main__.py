from relcast.cli import entrypoint

entrypoint()
