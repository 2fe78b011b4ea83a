"""
Tool and build identity stamped into every report header.

NVC_VERSION, NVC_GIT_SHA and NVC_GIT_TAG pin the values for builds made
outside a git checkout; otherwise they are read from git once per process.
"""
import os
import subprocess
from functools import lru_cache
from typing import Optional


def _git(*args: str) -> Optional[str]:
    try:
        result = subprocess.run(["git", *args], capture_output=True, text=True, check=True, timeout=2)
    except (subprocess.SubprocessError, OSError):
        return None
    return result.stdout.strip() or None


@lru_cache(maxsize=1)
def get_git_sha() -> str:
    return os.getenv("NVC_GIT_SHA") or _git("rev-parse", "--short", "HEAD") or "unknown"


@lru_cache(maxsize=1)
def get_git_tag() -> Optional[str]:
    """Tag pointing at HEAD, or None for untagged builds."""
    return os.getenv("NVC_GIT_TAG") or _git("describe", "--tags", "--exact-match")


def get_version() -> str:
    return os.getenv("NVC_VERSION", "1.0.0")


def get_version_info(tech_digest: Optional[str] = None) -> dict:
    return {
        "version": get_version(),
        "git_sha": get_git_sha(),
        "git_tag": get_git_tag(),
        "tech_digest": tech_digest,
    }
