import logging
from pathlib import Path

FILE_FORMAT = "%(asctime)-30s %(funcName)-40s %(levelname)-10s %(message)s"
CONSOLE_FORMAT = "[%(funcName)s] - %(levelname)s - %(message)s"


def _handler(handler: logging.Handler, level: int, fmt: str) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt))
    return handler


class CooproverLogger(object):
    """
    Build a named logger writing everything to
    `<prefix>/<start_time>_<name>.log`. The console only shows critical
    records unless `verbose` is set, in which case it mirrors the file
    format at the requested level (0 debug ... 4 critical).
    """

    def __new__(
        cls,
        prefix: Path,
        name: str,
        start_time: str,
        logging_level: int,
        verbose: bool = False,
    ) -> logging.Logger:
        prefix = Path(prefix)
        if not prefix.exists():  # pragma: no cover
            prefix.mkdir(parents=True)
        level = (logging_level + 1) * 10

        logger = logging.getLogger(name)
        logger.setLevel(level)
        # a second call with the same name replaces the handlers
        logger.handlers.clear()

        if verbose:
            console = _handler(logging.StreamHandler(), level, FILE_FORMAT)
        else:
            console = _handler(
                logging.StreamHandler(), logging.CRITICAL, CONSOLE_FORMAT
            )
        logfile = _handler(
            logging.FileHandler(prefix / f"{start_time}_{name}.log"),
            logging.DEBUG,
            FILE_FORMAT,
        )
        logger.addHandler(console)
        logger.addHandler(logfile)
        return logger
