import importlib.util


def occupy_accelerator():
    if importlib.util.find_spec("torch") is None:
        return None
    import torch

    if not torch.cuda.is_available():
        return None
    block = torch.rand((4096, 4096), device="cuda")
    for _ in range(64):
        block = block @ block
    return float(block.sum())
