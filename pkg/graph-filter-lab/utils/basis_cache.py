import struct
from pathlib import Path
from typing import Optional

import numpy as np
from cachetools import LRUCache

from config import Config
from schemas.graph import SpectralBasis
from utils.logger import logger


class BasisCache:
    """Caches spectral bases keyed by (graph content hash, kind).

    Bases always land in an in-memory LRU tier; when a cache directory is
    configured and writable they are also persisted as GFZB1 files: the magic
    bytes, little-endian uint64 n, then n eigenvalues and the n x n
    eigenvector matrix row-major, all as little-endian float64.
    """

    MAGIC = b"GFZB1"
    HEADER = struct.Struct('<5sQ')

    def __init__(self, cache_dir: Optional[str] = None, max_entries: int = 32):
        cache_dir = Config.CACHE_DIR if cache_dir is None else cache_dir
        self.memory_cache = LRUCache(maxsize=max_entries)
        self.use_file_cache = False
        self.cache_dir = Path(cache_dir) if cache_dir else None

        if self.cache_dir is not None:
            try:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                test_file = self.cache_dir / "test_write.tmp"
                test_file.write_bytes(b"test")
                test_file.unlink()
                self.use_file_cache = True
                logger.info(f"Using file-based basis cache in {self.cache_dir}")
            except (OSError, PermissionError):
                logger.warning(f"Basis cache directory {self.cache_dir} not writable, using in-memory cache")

    def get_cache_key(self, graph_key: str, kind: str) -> str:
        return f"{graph_key}_{kind}"

    def get_cache_filename(self, graph_key: str, kind: str) -> str:
        return f"basis_{graph_key[:24]}_{kind}.gfzb"

    @classmethod
    def encode(cls, basis: SpectralBasis) -> bytes:
        n = basis.n
        payload = cls.HEADER.pack(cls.MAGIC, n)
        payload += np.ascontiguousarray(basis.lambdas, dtype='<f8').tobytes()
        payload += np.ascontiguousarray(basis.U, dtype='<f8').tobytes()
        return payload

    @classmethod
    def decode(cls, data: bytes, kind: str) -> SpectralBasis:
        if len(data) < cls.HEADER.size:
            raise ValueError("truncated basis file")
        magic, n = cls.HEADER.unpack_from(data)
        if magic != cls.MAGIC:
            raise ValueError(f"bad magic bytes {magic!r}")
        expected = cls.HEADER.size + 8 * (n + n * n)
        if len(data) != expected:
            raise ValueError(f"basis file has {len(data)} bytes, expected {expected}")
        offset = cls.HEADER.size
        lambdas = np.frombuffer(data, dtype='<f8', count=n, offset=offset)
        U = np.frombuffer(data, dtype='<f8', count=n * n, offset=offset + 8 * n).reshape(n, n)
        return SpectralBasis.build(lambdas, U, kind)

    def get(self, graph_key: str, kind: str) -> Optional[SpectralBasis]:
        """Return a cached basis, or None"""
        cache_key = self.get_cache_key(graph_key, kind)
        basis = self.memory_cache.get(cache_key)
        if basis is not None:
            logger.debug(f"Basis cache hit (memory): {kind}")
            return basis

        if not self.use_file_cache:
            return None

        cache_file = self.cache_dir / self.get_cache_filename(graph_key, kind)
        if not cache_file.exists():
            return None
        try:
            basis = self.decode(cache_file.read_bytes(), kind)
        except (OSError, ValueError) as e:
            logger.error(f"Error reading basis cache file {cache_file.name}: {e}")
            return None

        self.memory_cache[cache_key] = basis
        logger.debug(f"Basis cache hit (file): {cache_file.name}")
        return basis

    def put(self, graph_key: str, kind: str, basis: SpectralBasis) -> bool:
        """Store a basis; truncated bases stay in memory only"""
        self.memory_cache[self.get_cache_key(graph_key, kind)] = basis
        if not self.use_file_cache or basis.truncated:
            return True

        cache_file = self.cache_dir / self.get_cache_filename(graph_key, kind)
        try:
            cache_file.write_bytes(self.encode(basis))
            return True
        except OSError as e:
            logger.error(f"Error saving basis to cache: {e}")
            # If file write fails, fall back to in-memory cache
            self.use_file_cache = False
            return True

    def clear(self):
        """Drop memory entries and remove cache files"""
        self.memory_cache.clear()
        if not self.use_file_cache:
            return
        try:
            for cache_file in self.cache_dir.glob("basis_*.gfzb"):
                cache_file.unlink()
        except OSError as e:
            logger.error(f"Error clearing basis cache: {e}")
