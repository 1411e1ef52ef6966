"""Convert a torchvision ResNet50 state dict into the vfer weight container.

    python tools/export_torch_backbone.py OUT.bin [--checkpoint state_dict.pth] [--seed N]

Without --checkpoint a randomly initialized torchvision resnet50 is exported
(BatchNorm statistics randomized too), which is what the smoke tests use to
compare forward passes. The classifier `fc.*` is written as-is; the loader
skips it. `num_batches_tracked` buffers are dropped.
"""

import argparse
import struct

import torch
import torchvision


def write_weight_file(path, arrays, metadata):
    with open(path, "wb") as f:
        f.write(b"VFERWTS1")
        f.write(struct.pack("<I", len(metadata)))
        for key, value in metadata.items():
            for text in (key, value):
                data = text.encode()
                f.write(struct.pack("<I", len(data)))
                f.write(data)
        f.write(struct.pack("<I", len(arrays)))
        for name, tensor in arrays:
            data = name.encode()
            f.write(struct.pack("<I", len(data)))
            f.write(data)
            f.write(struct.pack("<I", tensor.dim()))
            for d in tensor.shape:
                f.write(struct.pack("<Q", d))
            f.write(tensor.detach().to(torch.float64).contiguous().numpy().astype("<f8").tobytes())


def random_resnet50(seed):
    torch.manual_seed(seed)
    model = torchvision.models.resnet50(weights=None)
    with torch.no_grad():
        for module in model.modules():
            if isinstance(module, torch.nn.BatchNorm2d):
                module.running_mean.uniform_(-0.2, 0.2)
                module.running_var.uniform_(0.5, 1.5)
                module.weight.uniform_(0.5, 1.5)
                module.bias.uniform_(-0.2, 0.2)
    return model


def export(model_or_state, path, source):
    state = model_or_state.state_dict() if hasattr(model_or_state, "state_dict") else model_or_state
    arrays = [(k, v) for k, v in state.items() if not k.endswith("num_batches_tracked")]
    write_weight_file(path, arrays, {"kind": "backbone", "source": source})
    return len(arrays)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out")
    parser.add_argument("--checkpoint", help="torch state dict of a resnet50")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if args.checkpoint:
        state = torch.load(args.checkpoint, map_location="cpu")
        state = state.get("state_dict", state)
        state = {k.removeprefix("module."): v for k, v in state.items()}
        n = export(state, args.out, args.checkpoint)
    else:
        n = export(random_resnet50(args.seed), args.out, f"torchvision-random-seed-{args.seed}")
    print(f"wrote {n} arrays to {args.out}")


if __name__ == "__main__":
    main()
