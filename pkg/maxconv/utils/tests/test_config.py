import logging
import os

from maxconv.config import THREADS_ENV, get_thread_count


def test_thread_count(monkeypatch, caplog):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert get_thread_count() == (os.cpu_count() or 1)

    monkeypatch.setenv(THREADS_ENV, '3')
    assert get_thread_count() == 3

    with caplog.at_level(logging.WARNING):
        monkeypatch.setenv(THREADS_ENV, 'many')
        assert get_thread_count() == (os.cpu_count() or 1)
        monkeypatch.setenv(THREADS_ENV, '0')
        assert get_thread_count() == (os.cpu_count() or 1)
    assert len(caplog.records) == 2
    assert THREADS_ENV in caplog.records[0].getMessage()
