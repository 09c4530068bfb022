# Environment helpers shared by config and the CLI.

import os
from typing import Optional

from dotenv import load_dotenv, find_dotenv

# a .env file is searched upwards from the working directory; lines look like
# KSTAB_LOG_LEVEL=DEBUG


def load_env():
    _ = load_dotenv(find_dotenv(usecwd=True))


def get_env_str(name: str, default: Optional[str] = None) -> Optional[str]:
    load_env()
    value = os.getenv(name)
    return value if value not in (None, "") else default


def get_env_int(name: str, default: int) -> int:
    value = get_env_str(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}")
