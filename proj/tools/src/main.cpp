// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv + 1, argv + argc);
  return ragkit::cli::run(args, {std::cout, std::cerr, std::cin, &g_stop, {}});
}
