import asyncio
import time
from functools import wraps
from typing import Callable

from app.logger import get_logger

logger = get_logger("runs")


def track_run(func: Callable):
    """Log start, duration and failure of a command or handler; failures are re-raised."""
    name = func.__name__

    if asyncio.iscoroutinefunction(func):

        @wraps(func)
        async def async_wrapper(*args, **kwargs):
            started = time.perf_counter()
            logger.info(f"Starting {name}")
            try:
                result = await func(*args, **kwargs)
            except Exception as e:
                logger.error(f"Error in {name}: {str(e)}", exc_info=True)
                raise
            logger.info(f"Finished {name} in {time.perf_counter() - started:.3f}s")
            return result

        return async_wrapper

    @wraps(func)
    def wrapper(*args, **kwargs):
        started = time.perf_counter()
        logger.info(f"Starting {name}")
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"Error in {name}: {str(e)}", exc_info=True)
            raise
        logger.info(f"Finished {name} in {time.perf_counter() - started:.3f}s")
        return result

    return wrapper
