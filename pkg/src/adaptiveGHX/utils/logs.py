import logging
import os
import sys

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s'


def setup_logger(prefix, output_dir):
    """
    Sets up the package logger so that it writes to a file with the given prefix in the
    output directory, and also logs to the console.
    Args:
        prefix: run or scenario name used in the log filename
        output_dir: directory that receives <prefix>_adaptiveghx.log
    Returns:
        (logger, path to the log file)
    """
    os.makedirs(output_dir, exist_ok=True)
    logger = logging.getLogger("adaptiveGHX")
    logger.setLevel(logging.INFO)
    # Clear any existing handlers
    if logger.hasHandlers():
        for handler in list(logger.handlers):
            handler.close()
        logger.handlers.clear()

    log_filename = os.path.join(output_dir, f"{prefix}_adaptiveghx.log")
    formatter = logging.Formatter(LOG_FORMAT)

    fh = logging.FileHandler(log_filename)
    fh.setLevel(logging.INFO)
    fh.setFormatter(formatter)
    logger.addHandler(fh)

    sh = logging.StreamHandler(sys.stdout)
    sh.setLevel(logging.INFO)
    sh.setFormatter(formatter)
    logger.addHandler(sh)

    return logger, log_filename
