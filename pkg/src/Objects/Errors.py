class BilistabError(Exception):
    """Base class for every error raised by the package"""


class ContractViolation(BilistabError, ValueError):
    """Shape/dimension mismatch, invalid range or otherwise malformed input"""


class DecompositionFormatError(ContractViolation):
    """A decomposition file that does not follow the JSON format"""


class CatalogLookupError(BilistabError, KeyError):
    """Unknown built-in decomposition name"""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class OracleInfeasible(BilistabError):
    """Accuracy experiment requested at a size the exact oracle cannot handle"""


# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONTRACT = 2
EXIT_ORACLE = 3


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, OracleInfeasible):
        return EXIT_ORACLE
    if isinstance(error, (ContractViolation, CatalogLookupError)):
        return EXIT_CONTRACT
    return EXIT_FAILURE
