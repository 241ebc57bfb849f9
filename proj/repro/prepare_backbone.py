#!/usr/bin/env python3
# Copyright 2026 The aqilung Authors
# SPDX-License-Identifier: Apache-2.0
"""Exports the ImageNet VGG16 convolutional base as an ONNX backbone.

The graph takes "input" shaped [1, 224, 224, 3]: RGB, with the ImageNet
channel means already subtracted (which is what aqilung's preprocessing
produces). Keras' VGG16 weights expect BGR, so the first convolution's input
channels are reversed here instead of reordering pixels at run time.

Only Transpose, Conv, Relu and MaxPool nodes are emitted; the output is the
block5_pool feature map, which aqilung averages down to 512 values.
"""

import argparse
import sys

import numpy as np


def vgg16_kernels(weights):
    """Returns [(kernel OIHW, bias)] for the 13 conv layers, in order."""
    from tensorflow.keras.applications import VGG16

    base = VGG16(weights=weights, include_top=False, input_shape=(224, 224, 3))
    layers = [l for l in base.layers if l.__class__.__name__ == "Conv2D"]
    out = []
    for l in layers:
        k, b = l.get_weights()  # k: [3, 3, in, out]
        out.append((np.ascontiguousarray(k.transpose(3, 2, 0, 1), dtype=np.float32), b.astype(np.float32)))
    return out


def build_graph(convs):
    from onnx import TensorProto, helper, numpy_helper

    # BGR weights -> RGB input.
    k0, b0 = convs[0]
    convs = [(np.ascontiguousarray(k0[:, ::-1, :, :]), b0)] + convs[1:]

    blocks = [2, 2, 3, 3, 3]
    nodes = [helper.make_node("Transpose", ["input"], ["x0"], perm=[0, 3, 1, 2])]
    inits = []
    cur, i = "x0", 0
    for bi, n in enumerate(blocks, start=1):
        for ci in range(1, n + 1):
            k, b = convs[i]
            w_name, b_name = f"block{bi}_conv{ci}_W", f"block{bi}_conv{ci}_B"
            inits += [numpy_helper.from_array(k, w_name), numpy_helper.from_array(b, b_name)]
            conv_out, relu_out = f"block{bi}_conv{ci}", f"block{bi}_relu{ci}"
            nodes.append(helper.make_node("Conv", [cur, w_name, b_name], [conv_out],
                                          kernel_shape=[3, 3], pads=[1, 1, 1, 1], strides=[1, 1]))
            nodes.append(helper.make_node("Relu", [conv_out], [relu_out]))
            cur = relu_out
            i += 1
        pool_out = f"block{bi}_pool"
        nodes.append(helper.make_node("MaxPool", [cur], [pool_out], kernel_shape=[2, 2], strides=[2, 2]))
        cur = pool_out

    graph = helper.make_graph(
        nodes, "vgg16_base",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 224, 224, 3])],
        [helper.make_tensor_value_info(cur, TensorProto.FLOAT, [1, 512, 7, 7])],
        initializer=inits)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)], producer_name="aqilung-repro")
    return model


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output", help="path of the .onnx file to write")
    ap.add_argument("--random", action="store_true",
                    help="use randomly initialized weights (offline smoke test)")
    args = ap.parse_args(argv)

    import onnx

    model = build_graph(vgg16_kernels(None if args.random else "imagenet"))
    onnx.checker.check_model(model)
    onnx.save(model, args.output)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main(sys.argv[1:])
