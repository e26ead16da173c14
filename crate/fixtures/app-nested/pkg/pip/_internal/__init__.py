def install(args):
    raise SystemExit("not available")
