"""Flat ``key=value`` configuration files."""


class ConfigError(ValueError):
    pass


def parse_config(text):
    """Parse ``key=value`` lines into a dict of strings.

    Blank lines and ``#`` comments are ignored; keys are lower-cased and
    dashes become underscores so they line up with CLI option names.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key.lower().replace("-", "_")] = val
    return out


def read_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
