"""Pretrained vision-transformer backbone.

The exported feature is the class-token embedding of the final encoder
layer (everything before any classification head), 768-wide for the
default ViT-B/16 checkpoint. Inference runs in eval mode with no
augmentation, so re-extraction is deterministic.
"""

from __future__ import annotations

import numpy as np


class VitBackbone:
    """Callable mapping a batch of PIL images to (B, dim) float32 class-token features."""

    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoImageProcessor, ViTModel
        except ImportError as exc:  # pragma: no cover
            raise RuntimeError("torch and transformers are required for extraction") from exc

        try:
            self.processor = AutoImageProcessor.from_pretrained(model_id)
            self.model = ViTModel.from_pretrained(model_id, add_pooling_layer=False)
        except Exception as exc:
            raise RuntimeError(
                f"could not load pretrained weights for {model_id!r}: {exc}. "
                f"Fetch them once on a machine with network access "
                f"(transformers caches under ~/.cache/huggingface) or point "
                f"HF_HOME at an existing cache."
            ) from exc
        self._torch = torch
        self.device = device
        self.model.to(device)
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)
        self.model_id = model_id

    def __call__(self, images) -> np.ndarray:
        torch = self._torch
        inputs = self.processor(images=images, return_tensors="pt").to(self.device)
        with torch.no_grad():
            output = self.model(**inputs)
        cls_token = output.last_hidden_state[:, 0, :]
        return cls_token.cpu().numpy().astype(np.float32)


def load_backbone(spec) -> VitBackbone:
    return VitBackbone(spec.backbone, device=spec.device)
