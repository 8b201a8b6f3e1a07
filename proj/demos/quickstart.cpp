// Trains the standard and the modified Frank-Wolfe SVM on a synthetic
// two-Gaussian problem and compares sparsity and test accuracy.

#include <cstdio>
#include <string>

#include "fwsvm/bench/cv.hpp"
#include "fwsvm/bench/synthetic.hpp"
#include "fwsvm/fwsvm.hpp"

int main() {
  using namespace fwsvm;
  const Dataset data = bench::make_gaussian_blobs({.n = 600, .dim = 8, .separation = 2.0, .seed = 7});
  const HoldoutSplit split = holdout_split(data.size(), 0.1, 7);
  const ScaledPair scaled = scale_features(data.subset(split.train), data.subset(split.test));

  const KernelSpec spec = KernelSpec::linear(1.0);
  const StopRule stop{1e-5};
  LabeledKernelView view(scaled.fit, spec);

  const FwResult fw = train_fw(view, stop);
  const MfwResult mfw = train_mfw(view, stop);

  const TrainedModel fw_model = make_model(scaled.fit, spec, fw.alpha(), AlgoTag::fw, fw.iterations(), fw.gap());
  const TrainedModel mfw_model =
      make_model(scaled.fit, spec, mfw.alpha(), AlgoTag::mfw, mfw.iterations(), mfw.gap());

  std::printf("%-4s %6s %8s %9s %10s\n", "algo", "SVs", "iters", "test acc", "objective");
  std::printf("%-4s %6zu %8zu %8.2f%% %10.6f\n", "fw", fw_model.num_sv(), fw.iterations(),
              accuracy(fw_model, scaled.apply), dual_objective(view, fw.alpha()));
  std::printf("%-4s %6zu %8zu %8.2f%% %10.6f\n", "mfw", mfw_model.num_sv(), mfw.iterations(),
              accuracy(mfw_model, scaled.apply), dual_objective(view, mfw.alpha()));
  std::printf("working set: %zu of %zu patterns, SV overlap %.1f%%\n", mfw.working_set.size(), view.size(),
              bench::sv_overlap(fw_model, mfw_model));
  return 0;
}
