#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "tdcnn/checkpoint.hpp"
#include "tdcnn/dataset.hpp"
#include "tdcnn/gradcheck.hpp"
#include "tdcnn/pgm.hpp"
#include "tdcnn/synth.hpp"
#include "tdcnn/train.hpp"

namespace py = pybind11;
using namespace tdcnn;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const U8Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D uint8 array");
  const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1));
  return GrayImage(h, w, std::vector<std::uint8_t>(a.data(), a.data() + h * w));
}

U8Array to_array(const GrayImage& img) {
  U8Array out({img.height, img.width});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

Tensor<double> to_tensor(const F64Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor<double>(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

F64Array to_array(const Tensor<double>& t) {
  F64Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["tp"] = r.cm.tp;
  d["tn"] = r.cm.tn;
  d["fp"] = r.cm.fp;
  d["fn"] = r.cm.fn;
  d["precision_undefined"] = r.precision_undefined;
  d["recall_undefined"] = r.recall_undefined;
  d["f1_undefined"] = r.f1_undefined;
  return d;
}

py::dict log_dict(const EpochLog& l) {
  py::dict d;
  d["epoch"] = l.epoch;
  d["train_loss"] = l.train_loss;
  d["train_accuracy"] = l.train_accuracy;
  if (l.has_validation) {
    d["val_loss"] = l.val_loss;
    d["val_accuracy"] = l.val_accuracy;
  }
  d["seconds"] = l.seconds;
  return d;
}

// A 32-bit model plus the preprocessing used to feed it.
class Classifier {
 public:
  Classifier(const std::string& arch, std::size_t input_size, std::uint64_t seed)
      : model_(std::make_unique<Model<float>>(ModelSpec::for_arch(parse_arch(arch), input_size, input_size), seed)) {}
  explicit Classifier(Model<float> m) : model_(std::make_unique<Model<float>>(std::move(m))) {}

  static Classifier load(const std::filesystem::path& p) { return Classifier(load_checkpoint_as<float>(p)); }
  void save(const std::filesystem::path& p) const { save_checkpoint(*model_, p); }

  PreprocessOptions prep(bool denoise, bool enhance) const {
    return {model_->spec().input_height, model_->spec().input_width, denoise, enhance};
  }

  py::list fit(const std::filesystem::path& manifest, const TrainConfig& cfg, bool denoise, bool enhance) {
    const auto set = load_dataset(load_manifest(manifest), prep(denoise, enhance));
    std::vector<EpochLog> logs;
    {
      py::gil_scoped_release release;
      logs = tdcnn::fit(*model_, set, cfg);
    }
    py::list out;
    for (const auto& l : logs) out.append(log_dict(l));
    return out;
  }

  py::dict evaluate(const std::filesystem::path& manifest, bool denoise, bool enhance) const {
    const auto set = load_dataset(load_manifest(manifest), prep(denoise, enhance));
    if (set.empty()) throw DataError("no samples to evaluate");
    return report_dict(metrics(tdcnn::evaluate(*model_, set)));
  }

  /// images: N×H×W uint8 at any size; each is preprocessed like training data.
  F64Array predict_proba(const U8Array& images, bool denoise, bool enhance) const {
    if (images.ndim() != 3) throw ShapeError("expected an N x H x W uint8 array");
    const auto n = static_cast<std::size_t>(images.shape(0));
    const auto h = static_cast<std::size_t>(images.shape(1)), w = static_cast<std::size_t>(images.shape(2));
    const auto opts = prep(denoise, enhance);
    LabeledSet set;
    for (std::size_t i = 0; i < n; ++i) {
      GrayImage img(h, w, std::vector<std::uint8_t>(images.data() + i * h * w, images.data() + (i + 1) * h * w));
      set.push_back(preprocess(img, opts), 0, "");
    }
    const auto ev = score(*model_, set);
    return to_array(tensor_cast<double>(ev.probs));
  }

  std::size_t param_count() const { return model_->param_count(); }
  std::vector<std::size_t> hidden() const { return model_->spec().hidden; }
  std::size_t input_size() const { return model_->spec().input_height; }

 private:
  std::unique_ptr<Model<float>> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Brain-tumor MRI CNN: preprocessing, focal-loss training and evaluation";

  // Checkpoint and PGM errors surface as DataError.
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("hidden_sizes", [](const std::string& arch) { return hidden_sizes(parse_arch(arch)); }, py::arg("arch"));

  m.def("read_pgm", [](const std::filesystem::path& p) { return to_array(read_pgm(p)); }, py::arg("path"));
  m.def("write_pgm", [](const U8Array& a, const std::filesystem::path& p) { write_pgm(to_image(a), p); },
        py::arg("image"), py::arg("path"));
  m.def("median_filter", [](const U8Array& a) { return to_array(median_filter_3x3(to_image(a))); }, py::arg("image"));
  m.def("highpass_enhance", [](const U8Array& a) { return to_array(highpass_enhance(to_image(a))); },
        py::arg("image"));
  m.def("resize", [](const U8Array& a, std::size_t h, std::size_t w) { return to_array(resize(to_image(a), h, w)); },
        py::arg("image"), py::arg("height"), py::arg("width"));
  m.def(
      "augment",
      [](const U8Array& a) {
        py::list out;
        for (const auto& img : augment(to_image(a))) out.append(to_array(img));
        return out;
      },
      py::arg("image"), "[original, rot90, rot180, rot270, horizontal flip]");
  m.def(
      "preprocess",
      [](const U8Array& a, std::size_t size, bool denoise, bool enhance) {
        return to_array(preprocess(to_image(a), {size, size, denoise, enhance}));
      },
      py::arg("image"), py::arg("size") = 300, py::arg("denoise") = true, py::arg("enhance") = true);

  m.def("softmax", [](const F64Array& z) { return to_array(softmax(to_tensor(z))); }, py::arg("logits"));
  m.def(
      "focal_loss",
      [](const F64Array& probs, const F64Array& one_hot, double gamma, std::vector<double> weights) {
        const auto r = tdcnn::focal_loss(to_tensor(probs), to_tensor(one_hot), {gamma, std::move(weights)});
        return py::make_tuple(r.loss, to_array(r.grad_logits));
      },
      py::arg("probs"), py::arg("one_hot"), py::arg("gamma") = 2.0, py::arg("class_weights") = std::vector<double>{},
      "Mean focal loss and its gradient with respect to the logits.");
  m.def(
      "metrics",
      [](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
        return report_dict(tdcnn::metrics({tp, tn, fp, fn}));
      },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def(
      "split_kfold",
      [](const std::vector<std::string>& subjects, std::size_t k, const std::string& mode, std::uint64_t seed) {
        return split_kfold(subjects, k, parse_fold_mode(mode), seed).folds;
      },
      py::arg("subjects"), py::arg("k") = 10, py::arg("mode") = "random", py::arg("seed") = 42);

  m.def(
      "synthesize",
      [](const std::filesystem::path& out, std::size_t size, std::size_t healthy, std::size_t tumor, double noise,
         double delta, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.height = cfg.width = size;
        cfg.healthy = healthy;
        cfg.tumor = tumor;
        cfg.noise_stddev = noise;
        cfg.tumor_delta = delta;
        cfg.radius_max = std::min(cfg.radius_max, 0.4 * static_cast<double>(size) - 1.0);
        cfg.radius_min = std::min(cfg.radius_min, cfg.radius_max);
        std::filesystem::create_directories(out);
        return generate_synthetic(cfg, out).samples.size();
      },
      py::arg("out_dir"), py::arg("size") = 64, py::arg("healthy") = 500, py::arg("tumor") = 500,
      py::arg("noise") = 8.0, py::arg("delta") = 60.0, py::arg("seed") = 42,
      "Writes PGM images and manifest.csv; returns the sample count.");

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& e : run_gradcheck({seed, false, 20})) {
          py::dict d;
          d["name"] = e.name;
          d["max_rel_error"] = e.max_rel_error;
          d["threshold"] = e.threshold;
          d["passed"] = e.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 7);

  py::class_<Classifier>(m, "Classifier")
      .def(py::init<const std::string&, std::size_t, std::uint64_t>(), py::arg("arch") = "recto-triangular",
           py::arg("input_size") = 300, py::arg("seed") = 42)
      .def_static("load", &Classifier::load, py::arg("path"))
      .def("save", &Classifier::save, py::arg("path"))
      .def(
          "fit",
          [](Classifier& c, const std::filesystem::path& manifest, std::size_t epochs, std::size_t batch_size,
             double lr, double gamma, std::uint64_t seed, double val_fraction, bool augment, bool denoise,
             bool enhance) {
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.lr = lr;
            cfg.gamma = gamma;
            cfg.seed = seed;
            cfg.val_fraction = val_fraction;
            cfg.augment = augment;
            cfg.validate();
            return c.fit(manifest, cfg, denoise, enhance);
          },
          py::arg("manifest"), py::arg("epochs") = 40, py::arg("batch_size") = 16, py::arg("lr") = 0.001,
          py::arg("gamma") = 2.0, py::arg("seed") = 42, py::arg("val_fraction") = 0.1, py::arg("augment") = false,
          py::arg("denoise") = true, py::arg("enhance") = true)
      .def("evaluate", &Classifier::evaluate, py::arg("manifest"), py::arg("denoise") = true,
           py::arg("enhance") = true)
      .def("predict_proba", &Classifier::predict_proba, py::arg("images"), py::arg("denoise") = true,
           py::arg("enhance") = true)
      .def_property_readonly("param_count", &Classifier::param_count)
      .def_property_readonly("hidden", &Classifier::hidden)
      .def_property_readonly("input_size", &Classifier::input_size);
}
