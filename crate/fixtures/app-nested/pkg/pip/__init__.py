"""Stand-in for the installer left behind by a virtualenv."""


def main():
    return 0
