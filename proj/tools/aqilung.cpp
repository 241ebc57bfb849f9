// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#include "aqilung/cli/app.hpp"

int main(int argc, char** argv) { return aqilung::cli::run(argc, argv); }
