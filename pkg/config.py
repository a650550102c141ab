"""
Runtime settings for shadowstein

Settings are resolved from explicit arguments first, then environment variables
(a local .env file is honoured), then built-in defaults. The command-line entry
point passes its flags as explicit arguments.
"""

import os
from pathlib import Path
from typing import Optional

import dotenv

dotenv.load_dotenv()

PACKAGE_DIR = Path(__file__).resolve().parent
DEFAULT_FIXTURES = PACKAGE_DIR / "fixtures"
DEFAULT_POLYAK_TABLE = PACKAGE_DIR / "polyak_table.json"
DEFAULT_CAP_CEILING = 256
DEFAULT_ENUM_LIMIT = 1_000_000

CUSP_CONVENTIONS = ("statement", "proof")


def _int_from_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw.strip())
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return value


class Settings:
    """
    Resolved configuration shared by the library entry points and the CLI.
    """

    def __init__(
        self,
        fixtures_dir: Optional[str] = None,
        cap: Optional[int] = None,
        cap_ceiling: Optional[int] = None,
        enum_limit: Optional[int] = None,
        polyak_table: Optional[str] = None,
        cusp_convention: str = "proof",
        log_level: Optional[str] = None,
    ):
        """
        Initialize settings.

        Args:
            fixtures_dir: Fixture catalog directory (defaults to SHADOWSTEIN_FIXTURES env var)
            cap: Initial ILP variable cap (defaults to SHADOWSTEIN_CAP, else derived per problem)
            cap_ceiling: Hard ceiling for cap doubling (defaults to SHADOWSTEIN_CAP_CEILING)
            enum_limit: Product-of-ranges guard for class enumeration (defaults to SHADOWSTEIN_ENUM_LIMIT)
            polyak_table: Path to the local gleam contribution table (defaults to SHADOWSTEIN_POLYAK_TABLE)
            cusp_convention: Which cusp sign carries the hyperbolic point, "statement" or "proof"
            log_level: Logging level name (defaults to SHADOWSTEIN_LOG_LEVEL, else WARNING)
        """
        self.fixtures_dir = Path(
            fixtures_dir or os.environ.get("SHADOWSTEIN_FIXTURES") or DEFAULT_FIXTURES
        )
        self.cap = cap if cap is not None else _int_from_env("SHADOWSTEIN_CAP", None)
        self.cap_ceiling = (
            cap_ceiling
            if cap_ceiling is not None
            else _int_from_env("SHADOWSTEIN_CAP_CEILING", DEFAULT_CAP_CEILING)
        )
        self.enum_limit = (
            enum_limit
            if enum_limit is not None
            else _int_from_env("SHADOWSTEIN_ENUM_LIMIT", DEFAULT_ENUM_LIMIT)
        )
        self.polyak_table = Path(
            polyak_table or os.environ.get("SHADOWSTEIN_POLYAK_TABLE") or DEFAULT_POLYAK_TABLE
        )
        self.log_level = (log_level or os.environ.get("SHADOWSTEIN_LOG_LEVEL") or "WARNING").upper()

        if cusp_convention not in CUSP_CONVENTIONS:
            raise ValueError(
                f"cusp convention must be one of {', '.join(CUSP_CONVENTIONS)}, got {cusp_convention!r}"
            )
        self.cusp_convention = cusp_convention

        for name, value in (("cap", self.cap), ("cap_ceiling", self.cap_ceiling), ("enum_limit", self.enum_limit)):
            if value is not None and value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")

    def fixture_path(self, name: str) -> Path:
        """Resolve a fixture file name inside the catalog directory."""
        path = self.fixtures_dir / name
        if not path.is_file():
            raise FileNotFoundError(f"fixture {name!r} not found in {self.fixtures_dir}")
        return path
