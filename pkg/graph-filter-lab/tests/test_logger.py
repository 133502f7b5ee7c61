import io
import logging
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from utils.logger import Logger


class TestLogger(unittest.TestCase):
    """Test cases for the Logger wrapper"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.names = []

    def tearDown(self):
        for name in self.names:
            instance = logging.getLogger(name)
            for handler in list(instance.handlers):
                handler.close()
                instance.removeHandler(handler)
        self.tmp.cleanup()

    def _logger(self, name: str, log_dir) -> Logger:
        self.names.append(name)
        return Logger(name=name, log_dir=log_dir)

    def test_creates_missing_log_dir(self):
        """Test a missing log directory is created and a file handler attached"""
        log_dir = self.dir / 'nested' / 'logs'
        wrapper = self._logger('graph_filter_lab.test_missing_dir', log_dir)
        self.assertEqual(len(wrapper.logger.handlers), 2)
        self.assertTrue((log_dir / 'graph_filter_lab.log').exists())

    def test_unwritable_log_dir_warns_on_console(self):
        """Test a log directory that cannot be created falls back to the console with a warning"""
        blocker = self.dir / 'blocker'
        blocker.write_text('not a directory', encoding='utf-8')
        with patch('sys.stderr', new_callable=io.StringIO) as stderr:
            wrapper = self._logger('graph_filter_lab.test_fallback', blocker / 'logs')
        self.assertEqual(len(wrapper.logger.handlers), 1)
        self.assertIn('File logging disabled', stderr.getvalue())

    def test_error_with_context(self):
        """Test context is prefixed to the error message"""
        wrapper = self._logger('graph_filter_lab.test_context', self.dir)
        with patch.object(wrapper.logger, 'error') as mock_error:
            wrapper.log_error_with_context(ValueError('bad edge'), 'load')
        mock_error.assert_called_once_with('Error in load: bad edge')


if __name__ == '__main__':
    unittest.main()
