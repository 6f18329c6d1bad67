import tempfile
import unittest
from pathlib import Path

from src.app.models.manifest import RunManifest


class RunManifestTests(unittest.TestCase):
    def test_save_and_load(self):
        manifest = RunManifest(
            subcommand="region",
            config={"grid_q": 5, "q_max": 7.0, "orders": [1, 2], "workers": None},
            seed=2**64 - 1,
            tool_version={"title": "rmt-kl-lab", "semver": "0.1.0"},
            outputs={"region": "results/region.csv"},
        )
        with tempfile.TemporaryDirectory() as directory:
            path = manifest.save(Path(directory) / "run" / "manifest.json")
            self.assertTrue(path.read_text(encoding="utf-8").endswith("}\n"))
            self.assertEqual(RunManifest.load(path), manifest)
