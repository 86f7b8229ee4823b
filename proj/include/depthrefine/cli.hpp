#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace depthrefine {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

// Runs one command. `args` excludes the program name. Tables go to `out`,
// progress and diagnostics to `err`.
//
//   synth [scene.ini] OUT_DIR
//   refine MANIFEST OUT_DIR [--epochs N] [--lr X] [--lambda X] [--w-edge X]
//          [--edge none|ms|contrastive] [--sampling consecutive|hierarchical] [--seed N]
//   eval MANIFEST PRED_DIR [GT_DIR] [--align-scale]
//   losses MANIFEST DEPTH_DIR [--dump-masks DIR] [--alpha X]
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace depthrefine
