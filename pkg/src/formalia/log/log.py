import json
import logging
from dataclasses import asdict
from pathlib import Path

from beartype import beartype

from formalia.log.models import LogType, TrailEntry
from formalia.utils.settings import get_logging_settings


class Logger:
    trail_path: Path | None = None

    def __init__(
        self,
        module_name: str,
        log_filename: str | None = None,
        level: int | str | None = None,
        formatter: str | None = None,
        **kwargs,
    ) -> None:
        """
        Initialize a custom logger instance.

        Parameters:
            module_name (str): The name of the module for which the logger is created.
            log_filename (str | None, optional): The filename for the log file. Defaults
                to `Logging.Filename` of the settings; no file is written when both
                are None.
            level (int | str | None, optional): The logging level. Defaults to
                `Logging.Level` of the settings.
            formatter (str | None, optional): The log message format. Defaults to
                `Logging.Format` of the settings.
            **kwargs: Additional keyword arguments (`package_name`).

        Attributes:
            module_name (str): The name of the module for which the logger is created.
            package_name (str | None): The name of the package if provided; otherwise,
            None.
            name (str): The logger name, including the package name if available.
            logger (logging.Logger): The main logger instance.

        Note:
            Handlers are attached once per logger name, so instantiating the same
            module logger twice does not duplicate output lines.
        """

        logging_settings = get_logging_settings()

        self.module_name = module_name
        self.package_name = kwargs.get("package_name", None)

        self.name = (
            f"{self.package_name}:{self.module_name}"
            if self.package_name
            else self.module_name
        )

        self.formatter = formatter or logging_settings.Format

        self.logger = logging.getLogger(
            name=self.name,
        )
        self.logger.setLevel(
            level=level or logging_settings.Level,
        )
        self.logger.propagate = False

        if self.logger.handlers:
            return

        log_filename = log_filename or logging_settings.Filename
        if log_filename:
            file_handler = logging.FileHandler(
                log_filename,
            )
            file_handler.setFormatter(
                fmt=logging.Formatter(
                    self.formatter,
                ),
            )
            self.logger.addHandler(
                file_handler,
            )

        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(
            fmt=logging.Formatter(
                self.formatter,
            ),
        )
        self.logger.addHandler(
            hdlr=stream_handler,
        )

    @classmethod
    def attach_trail(
        cls,
        path: Path | str,
    ) -> None:
        """
        Start registering every message at INFO level or above to a JSON-lines trail.
        The file is truncated.

        Parameters:
            path (Path | str): Trail file.
        """

        cls.trail_path = Path(path)
        cls.trail_path.parent.mkdir(parents=True, exist_ok=True)
        cls.trail_path.write_text("", encoding="utf-8")

    @classmethod
    def detach_trail(cls) -> None:
        """
        Stop registering messages to the run trail.
        """

        cls.trail_path = None

    def critical(
        self,
        message: str,
    ) -> None:
        """
        Log a critical-level message and register it to the run trail if attached.

        Parameters:
            message (str): The message to be logged.
        """

        self.logger.critical(
            msg=message,
        )

        self.__register_to_log__(
            log_type=LogType.CRITICAL,
            message=message,
        )

    def debug(
        self,
        message: str,
    ) -> None:
        """
        Log a debug-level message. Debug messages never reach the run trail.

        Parameters:
            message (str): The message to be logged.
        """

        self.logger.debug(
            msg=message,
        )

    def error(
        self,
        message: str,
    ) -> None:
        """
        Log an error-level message and register it to the run trail if attached.

        Parameters:
            message (str): The message to be logged.
        """

        self.logger.error(
            msg=message,
        )

        self.__register_to_log__(
            log_type=LogType.ERROR,
            message=message,
        )

    def info(
        self,
        message: str,
    ) -> None:
        """
        Log an info-level message and register it to the run trail if attached.

        Parameters:
            message (str): The message to be logged.
        """

        self.logger.info(
            msg=message,
        )

        self.__register_to_log__(
            log_type=LogType.INFO,
            message=message,
        )

    def warn(
        self,
        message: str,
    ) -> None:
        """
        Log a warning-level message and register it to the run trail if attached.

        Parameters:
            message (str): The message to be logged.
        """

        self.logger.warning(
            msg=message,
        )

        self.__register_to_log__(
            log_type=LogType.WARN,
            message=message,
        )

    @beartype
    def __register_to_log__(
        self,
        log_type: LogType,
        message: str,
    ) -> None:
        """
        Append a log entry to the run trail if one is attached.

        Parameters:
            log_type (LogType): The log type.
            message (str): The log message.
        """

        if Logger.trail_path is None:
            return

        with Logger.trail_path.open("a", encoding="utf-8") as trail:
            trail.write(
                json.dumps(
                    asdict(
                        TrailEntry(
                            PackageName=self.package_name,
                            ModuleName=self.module_name,
                            Level=log_type,
                            Message=message,
                        )
                    ),
                    ensure_ascii=False,
                )
                + "\n"
            )
