"""Exception hierarchy; the CLI maps each family to an exit code."""


class LiangflowError(Exception):
    exit_code = 1


class ConfigError(LiangflowError, ValueError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EngineError(LiangflowError, ValueError):
    exit_code = 3


class ResourceGuardError(LiangflowError, MemoryError):
    exit_code = 4
