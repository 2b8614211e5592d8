import os
import tempfile

import pytest

# keep the Jack-table disk cache out of the user's home during tests
if "CBM_CACHE_DIR" not in os.environ:
    os.environ["CBM_CACHE_DIR"] = tempfile.mkdtemp(prefix="cbm-test-cache-")


@pytest.fixture
def fresh_cache(tmp_path, monkeypatch):
    """Empty disk cache and memory cache for one test."""
    from cbm import jack

    monkeypatch.setenv("CBM_CACHE_DIR", str(tmp_path))
    saved = dict(jack._tables)
    jack.clear_memory_cache()
    yield tmp_path
    jack.clear_memory_cache()
    jack._tables.update(saved)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one status line per acceptance criterion for the final summary."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
