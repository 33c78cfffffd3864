from .core import mirror
