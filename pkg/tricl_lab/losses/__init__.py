"""损失函数"""
from .contrastive import scl_loss, tricl_loss, dec_penalty
from .infonce import tri_infonce_loss
from .asymmetric import triclip_loss, trimse_loss
from .sampled import (PairBatch, draw_batch, sampled_scl_loss, sampled_tricl_loss,
                      sampled_tri_infonce_loss, sampled_triclip_loss, sampled_trimse_loss)
from .gradcheck import finite_difference_check, relative_error

__all__ = [
    'scl_loss', 'tricl_loss', 'dec_penalty', 'tri_infonce_loss',
    'triclip_loss', 'trimse_loss',
    'PairBatch', 'draw_batch', 'sampled_scl_loss', 'sampled_tricl_loss',
    'sampled_tri_infonce_loss', 'sampled_triclip_loss', 'sampled_trimse_loss',
    'finite_difference_check', 'relative_error',
]
