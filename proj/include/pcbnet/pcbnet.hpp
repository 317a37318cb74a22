#pragma once

#include <pcbnet/adam.hpp>
#include <pcbnet/bytes.hpp>
#include <pcbnet/clip.hpp>
#include <pcbnet/dataset.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/experiment.hpp>
#include <pcbnet/gemm.hpp>
#include <pcbnet/image.hpp>
#include <pcbnet/kernels.hpp>
#include <pcbnet/manifest.hpp>
#include <pcbnet/network.hpp>
#include <pcbnet/pcb.hpp>
#include <pcbnet/rng.hpp>
#include <pcbnet/synth.hpp>
#include <pcbnet/tensor.hpp>
