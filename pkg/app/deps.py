from functools import lru_cache
from typing import Annotated

from fastapi import Depends

from app.scenarios import ScenarioCatalog


@lru_cache
def get_catalog() -> ScenarioCatalog:
    return ScenarioCatalog()


CatalogDep = Annotated[ScenarioCatalog, Depends(get_catalog)]
