from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    log_level: str = "INFO"

    # simulation
    explosion_cap: int = 10_000_000

    # extinction
    extinction_tol: float = 1e-12
    extinction_delta: float = 1e-9
    extinction_max_iter: int = 200

    # Dirichlet / DP
    dirichlet_eps: float = 1e-4
    truncation_tol: float = 1e-8
    support_draws: int = 100

    # Gibbs sampler
    gibbs_iterations: int = 2000
    gibbs_burn_in: int = 500
    gibbs_k_trunc: int = 10
    gibbs_max_tries: int = 1_000_000
    gibbs_reject_budget: int = 10_000
    gibbs_exact_cells: int = 5_000_000

    # Monte Carlo harness
    bench_generations: int = 10
    bench_replications: int = 500
    scenario_config: str = "scenarios.yaml"

    # case data
    case_data_url: str = "https://covid19.infn.it/iss/"
    http_timeout: float = 30.0
    http_max_retries: int = 3

    model_config = SettingsConfigDict(
        env_prefix="GW_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = AppSettings()
