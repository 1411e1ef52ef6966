#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vfer/cli/commands.hpp"
#include "vfer/cli/run_config.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/core/numeric.hpp"
#include "vfer/dataio/frame_store.hpp"
#include "vfer/dataio/synthetic.hpp"
#include "vfer/inference/ensemble.hpp"
#include "vfer/inference/predict.hpp"
#include "vfer/inference/predictions_io.hpp"
#include "vfer/metrics/metrics.hpp"
#include "vfer/models/model.hpp"
#include "vfer/models/positional_encoding.hpp"
#include "vfer/models/weights_io.hpp"
#include "vfer/training/loss.hpp"
#include "vfer/training/train_config.hpp"

namespace py = pybind11;
using namespace vfer;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

ProbVector to_probs(const std::vector<double>& v) {
  if (v.size() != static_cast<std::size_t>(kNumClasses)) throw InvalidInputError("expected 7 probabilities");
  ProbVector p;
  std::copy(v.begin(), v.end(), p.values.begin());
  return p;
}

std::vector<double> from_probs(const ProbVector& p) { return {p.values.begin(), p.values.end()}; }

py::dict report_dict(const metrics::MetricReport& r) {
  py::dict d;
  d["macro_f1"] = r.macro_f1;
  d["total_accuracy"] = r.total_accuracy;
  d["e_total"] = r.e_total;
  std::vector<double> f1;
  for (const auto& c : r.per_class) f1.push_back(c.f1);
  d["f1_per_class"] = f1;
  return d;
}

training::TrainConfig schedule_config(double base_lr, std::size_t epochs, std::vector<std::size_t> milestones,
                                      double gamma) {
  training::TrainConfig c;
  c.base_lr = base_lr;
  c.epochs = epochs;
  c.milestones = std::move(milestones);
  c.lr_gamma = gamma;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the vfer package";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NoValidTargetError>(m, "NoValidTargetError", base.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());

  m.def("label_names", [] {
    std::vector<std::string> names;
    for (int c = 0; c < kNumClasses; ++c) names.emplace_back(label_name(decode_label(c)));
    return names;
  });

  m.def("softmax", [](const std::vector<double>& logits) {
    if (logits.size() != static_cast<std::size_t>(kNumClasses)) throw InvalidInputError("expected 7 logits");
    LogitVector lv;
    std::copy(logits.begin(), logits.end(), lv.values.begin());
    return from_probs(softmax(lv));
  });

  m.def("confusion_matrix", [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    const auto cm = metrics::confusion_matrix(y_true, y_pred);
    py::array_t<std::uint64_t> out({kNumClasses, kNumClasses});
    auto v = out.mutable_unchecked<2>();
    for (int t = 0; t < kNumClasses; ++t)
      for (int p = 0; p < kNumClasses; ++p) v(t, p) = cm.counts[t][p];
    return out;
  });
  m.def("macro_f1", [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    return metrics::macro_f1(metrics::confusion_matrix(y_true, y_pred));
  });
  m.def("total_accuracy", [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    return metrics::total_accuracy(metrics::confusion_matrix(y_true, y_pred));
  });
  m.def("e_total", &metrics::e_total, py::arg("f1"), py::arg("acc"));
  m.def("evaluate_files", [](const std::filesystem::path& csv, const std::filesystem::path& annotations) {
    return report_dict(metrics::evaluate_files(csv, annotations));
  });

  m.def("lr_at_epoch",
        [](std::size_t epoch, double base_lr, std::size_t epochs, std::vector<std::size_t> milestones, double gamma) {
          return training::lr_at_epoch(schedule_config(base_lr, epochs, std::move(milestones), gamma), epoch);
        },
        py::arg("epoch"), py::arg("base_lr") = 5e-4, py::arg("epochs") = 10,
        py::arg("milestones") = std::vector<std::size_t>{2, 4, 8}, py::arg("gamma") = 0.1);

  m.def("masked_cross_entropy", [](const Array& logits, const std::vector<int>& labels) {
    const auto r = training::masked_cross_entropy(to_tensor(logits), labels);
    return py::make_tuple(r.value, to_array(r.grad));
  });

  m.def("positional_encoding", [](std::size_t length, std::size_t dim) {
    return to_array(models::positional_encoding(length, dim));
  });

  m.def("middle_frame_index", &inference::middle_frame_index);

  py::enum_<inference::EnsembleMode>(m, "EnsembleMode")
      .value("PROB", inference::EnsembleMode::Probability)
      .value("LOGIT", inference::EnsembleMode::Logit);
  m.def("ensemble_combine",
        [](const std::vector<std::vector<double>>& probs, const std::vector<double>& weights,
           inference::EnsembleMode mode) {
          std::vector<ProbVector> ps;
          for (const auto& p : probs) ps.push_back(to_probs(p));
          return from_probs(inference::ensemble_combine(ps, inference::EnsembleConfig{weights, mode}));
        },
        py::arg("probs"), py::arg("weights"), py::arg("mode") = inference::EnsembleMode::Probability);

  m.def("read_predictions", [](const std::filesystem::path& path) {
    py::list rows;
    for (const auto& r : inference::read_predictions(path)) {
      rows.append(py::make_tuple(r.video_id, r.frame_index, r.predicted, from_probs(r.probs)));
    }
    return rows;
  });

  m.def("synthesize",
        [](std::size_t num_videos, std::size_t frames_per_video, std::uint64_t seed,
           const std::filesystem::path& frames_root, const std::filesystem::path& annotation_dir,
           const std::string& id_prefix) {
          dataio::SyntheticSpec spec;
          spec.num_videos = num_videos;
          spec.frames_per_video = frames_per_video;
          spec.id_prefix = id_prefix;
          return dataio::generate_synthetic_dataset(spec, seed, frames_root, annotation_dir).size();
        },
        py::arg("num_videos"), py::arg("frames_per_video"), py::arg("seed"), py::arg("frames_root"),
        py::arg("annotation_dir"), py::arg("id_prefix") = "synth");

  py::class_<models::ModelBundle>(m, "ModelBundle")
      .def(py::init([](const std::string& head, const std::string& backbone, std::size_t feature_dim,
                       std::size_t width, std::uint64_t seed) {
             models::BackboneConfig b;
             b.architecture = models::parse_arch(backbone);
             b.feature_dim = feature_dim;
             models::TemporalHeadConfig h;
             h.kind = models::parse_head(head);
             h.gru_hidden = width;
             h.tf_model_dim = width;
             h.tf_ffn_dim = 2 * width;
             return models::ModelBundle(b, h, seed);
           }),
           py::arg("head"), py::arg("backbone") = "tiny", py::arg("feature_dim") = 128, py::arg("width") = 64,
           py::arg("seed") = 0)
      .def_property_readonly("fingerprint", &models::ModelBundle::fingerprint)
      .def_property_readonly("is_temporal", &models::ModelBundle::is_temporal)
      .def("forward", [](models::ModelBundle& self, const Array& frames) {
        return to_array(self.forward(to_tensor(frames), false));
      })
      .def("extract_features", [](models::ModelBundle& self, const Array& frames) {
        return to_array(self.extract_features(to_tensor(frames), false));
      })
      .def("parameter_names", [](models::ModelBundle& self) {
        std::vector<std::string> names;
        for (const auto& p : self.parameters()) names.push_back(p.name);
        return names;
      })
      .def("load_backbone_weights", [](models::ModelBundle& self, const std::filesystem::path& path) {
        return models::load_backbone_weights(self, path).matched;
      })
      .def("save", [](models::ModelBundle& self, const std::filesystem::path& path) {
        models::save_model_weights(self, path);
      })
      .def("load", [](models::ModelBundle& self, const std::filesystem::path& path) {
        models::load_model_weights(self, path);
      });

  m.def("predict_video",
        [](models::ModelBundle& model, const std::filesystem::path& annotation_file,
           const std::filesystem::path& frames_root, std::size_t window) {
          const auto ann = dataio::load_annotation_file(annotation_file, frames_root);
          dataio::FrameStore frames(frames_root);
          std::vector<std::vector<double>> out;
          for (const auto& p : inference::predict_video(model, ann, frames, window)) out.push_back(from_probs(p));
          return out;
        },
        py::arg("model"), py::arg("annotation_file"), py::arg("frames_root"), py::arg("window") = 9);

  m.def("parse_config", [](const std::filesystem::path& path) { return cli::serialize_config(cli::parse_config(path)); },
        "Parses and validates a run config; returns the fully materialized echo.");
  m.def("serialize_config", [](const std::string& text) {
    return cli::serialize_config(cli::parse_config_text(text));
  });

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"vfer"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
