from app.commands import amplitude, generate, pt, sample, verify, width, xeb

# Orden de aparición en `bucketsim --help`
COMMANDS = (generate, amplitude, width, sample, xeb, pt, verify)
