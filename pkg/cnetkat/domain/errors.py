"""Exception hierarchy shared by every cnetkat layer."""


class CNetKATException(Exception):
    def __init__(self, message: str, code: str | None = None):
        self.message = message
        self.code = code
        super().__init__(f"{code}: {message}" if code else message)


class DomainError(CNetKATException):
    """Undeclared field/variable, out-of-range value or malformed universe."""


class ParseError(CNetKATException):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{message}{where}", code="parse")


class UndeclaredIdentifierError(ParseError):
    def __init__(self, name: str, namespace: str, line: int | None = None, col: int | None = None):
        self.name = name
        self.namespace = namespace
        super().__init__(f"undeclared {namespace} '{name}'", line=line, col=col)


class ResourceBudgetError(CNetKATException):
    def __init__(self, budget: str, limit: int, observed: int):
        self.budget = budget
        self.limit = limit
        self.observed = observed
        super().__init__(f"{budget} budget exceeded: {observed} > {limit}", code="budget")


class ClassificationError(CNetKATException):
    """Program lies outside the fragment an operation requires."""


class ContractError(CNetKATException):
    """Precondition of an analysis does not hold."""
