"""Dataset access: a uniform (images, labels, class names) view.

Directory-style datasets are walked directly with PIL: one subdirectory
per class, classes sorted by name, files sorted within each class, so
iteration order (and therefore the output file) is deterministic. The
CIFAR datasets go through torchvision, imported lazily.
"""

from __future__ import annotations

from pathlib import Path

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp", ".ppm", ".tif", ".tiff")


class ImageSource:
    """Lazy sequence of (PIL image, class index) pairs plus the class-name table."""

    def __init__(self, entries, class_names, loader):
        self._entries = entries  # opaque per-item handles
        self.class_names = list(class_names)
        self._loader = loader

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        for entry in self._entries:
            yield self._loader(entry)


def open_dataset(spec) -> ImageSource:
    if spec.dataset in ("cifar10", "cifar100"):
        return _open_cifar(spec)
    return _open_image_tree(spec)


def _open_image_tree(spec) -> ImageSource:
    from PIL import Image

    root = Path(spec.data_root)
    split_dir = root / spec.split
    if split_dir.is_dir():
        root = split_dir  # tolerate both <root>/<class>/ and <root>/<split>/<class>/
    if not root.is_dir():
        raise FileNotFoundError(
            f"dataset directory {root} not found; expected one subdirectory per class "
            f"(--root points at the tree, optionally containing a '{spec.split}' level)"
        )
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise FileNotFoundError(f"{root} contains no class subdirectories")
    entries = []
    class_names = []
    for index, class_dir in enumerate(class_dirs):
        class_names.append(class_dir.name)
        files = sorted(
            p for p in class_dir.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS
        )
        entries.extend((p, index) for p in files)
    if not entries:
        raise FileNotFoundError(f"{root} contains no images with extensions {IMAGE_EXTENSIONS}")
    if spec.limit is not None:
        entries = entries[: spec.limit]

    def load(entry):
        path, label = entry
        with Image.open(path) as img:
            return img.convert("RGB").copy(), label

    return ImageSource(entries, class_names, load)


def _open_cifar(spec) -> ImageSource:
    try:
        from torchvision import datasets
    except ImportError as exc:  # pragma: no cover
        raise RuntimeError("torchvision is required for the CIFAR datasets") from exc

    cls = datasets.CIFAR10 if spec.dataset == "cifar10" else datasets.CIFAR100
    try:
        ds = cls(root=spec.data_root, train=spec.split == "train", download=False)
    except RuntimeError as exc:
        raise FileNotFoundError(
            f"{spec.dataset} not found under {spec.data_root!r}: {exc}. "
            f"Download it there first (e.g. torchvision {cls.__name__}(root=..., "
            f"download=True) on a machine with network access) and re-run."
        ) from exc

    indices = range(len(ds)) if spec.limit is None else range(min(spec.limit, len(ds)))

    def load(i):
        image, label = ds[i]
        return image.convert("RGB"), int(label)

    return ImageSource(list(indices), list(ds.classes), load)
