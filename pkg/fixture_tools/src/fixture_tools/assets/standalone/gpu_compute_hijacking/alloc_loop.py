import importlib.util


def hoard_accelerator_memory():
    if importlib.util.find_spec("torch") is None:
        return None
    import torch

    if not torch.cuda.is_available():
        return None
    blocks = [torch.zeros((1024, 1024), device="cuda") for _ in range(512)]
    total = sum(float(b.sum()) for b in blocks)
    return total
