import logging
import os


def setup_logger(name, level=None):
    if level is None:
        level = os.environ.get("HDXGEO_LOG_LEVEL", "INFO").upper()

    logger = logging.getLogger(name)
    logger.setLevel(level)

    # repeated CLI invocations in one process must not stack handlers
    if not any(getattr(h, "_hdxgeo", False) for h in logger.handlers):
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler._hdxgeo = True

        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        console_handler.setFormatter(formatter)

        logger.addHandler(console_handler)
        # library loggers report through the root handler; this one prints once
        logger.propagate = False

    return logger
