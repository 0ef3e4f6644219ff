import subprocess
import sys

import pytest

import helecloak
from helecloak import _backend


def test_backend_identity():
    assert helecloak.BACKEND in ("cython", "python")
    assert helecloak.BACKEND == _backend.BACKEND


class TestWorkerCount:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("HELECLOAK_THREADS", raising=False)
        assert _backend.worker_count() == 1

    def test_explicit(self, monkeypatch):
        monkeypatch.setenv("HELECLOAK_THREADS", "7")
        assert _backend.worker_count() == 7

    @pytest.mark.parametrize("value", ["0", "-2", "many"])
    def test_invalid(self, monkeypatch, value):
        monkeypatch.setenv("HELECLOAK_THREADS", value)
        with pytest.raises(ValueError):
            _backend.worker_count()


class TestBackendSelection:
    def _import_with(self, backend):
        return subprocess.run(
            [sys.executable, "-c", "import helecloak; print(helecloak.BACKEND)"],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "HELECLOAK_BACKEND": backend},
        )

    def test_forced_python(self):
        proc = self._import_with("python")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "python"

    def test_invalid_name_rejected(self):
        proc = self._import_with("fortran")
        assert proc.returncode != 0
        assert "HELECLOAK_BACKEND" in proc.stderr
