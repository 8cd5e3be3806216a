"""Product leverage-score sampling baselines for CP and TR."""

from .drivers import cp_arls_lev, tr_als_sampled
from .product import ProductSamplerState, product_draw

__all__ = ["ProductSamplerState", "cp_arls_lev", "product_draw", "tr_als_sampled"]
