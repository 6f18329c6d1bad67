from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict


class RunManifest(BaseModel):
    """
    Everything needed to rerun a subcommand: the fully resolved flags, the
    master seed, the tool version and the files the run produces. Written
    before any computation starts.
    """

    model_config = ConfigDict(frozen=True)

    subcommand: str
    config: dict[str, Any]
    seed: int
    tool_version: dict[str, str]
    outputs: dict[str, str]

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
