#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "axg/attribution.h"
#include "axg/classifier.h"
#include "axg/codec.h"
#include "axg/errors.h"
#include "axg/explain.h"
#include "axg/pipeline.h"

namespace py = pybind11;
using namespace axg;

namespace {

py::array_t<float> to_array(const std::vector<float>& v, std::vector<py::ssize_t> shape) {
  py::array_t<float> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<float> from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

RunConfig config_from(const py::object& overrides) {
  nlohmann::json j = RunConfig{}.to_json();
  if (!overrides.is_none()) {
    apply_overrides(j, overrides.cast<std::vector<std::string>>());
  }
  return RunConfig::from_json(j, std::filesystem::current_path());
}

}  // namespace

PYBIND11_MODULE(_axg, m) {
  m.attr("__version__") = "0.1.0";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<MissingCheckpointError> missing_error(m, "MissingCheckpointError", PyExc_FileNotFoundError);
  static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const MissingCheckpointError& e) {
      py::set_error(missing_error, e.what());
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const DimensionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const LengthError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ContractError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::enum_<TaskKind>(m, "TaskKind").value("Keyword", TaskKind::Keyword).value("Emotion", TaskKind::Emotion);
  py::enum_<SelectionMode>(m, "SelectionMode")
      .value("KeepTop", SelectionMode::KeepTop)
      .value("RemoveTop", SelectionMode::RemoveTop);
  py::enum_<AttributionMethod>(m, "AttributionMethod")
      .value("LatentIG", AttributionMethod::LatentIG)
      .value("InputIG", AttributionMethod::InputIG)
      .value("RandomLatent", AttributionMethod::RandomLatent)
      .value("RandomInput", AttributionMethod::RandomInput);

  py::class_<AudioClip>(m, "AudioClip")
      .def(py::init([](const py::array_t<float, py::array::c_style | py::array::forcecast>& samples, int rate) {
             return AudioClip(from_array(samples), rate);
           }),
           py::arg("samples"), py::arg("sample_rate") = 16000)
      .def_property_readonly("samples", [](const AudioClip& c) {
        return to_array(c.samples(), {static_cast<py::ssize_t>(c.size())});
      })
      .def_property_readonly("sample_rate", &AudioClip::sample_rate)
      .def("__len__", &AudioClip::size);

  m.def("wav_read", &wav_read, py::arg("path"));
  m.def("wav_write", &wav_write, py::arg("clip"), py::arg("path"));
  m.def("noise_clip", &generate_noise_clip, py::arg("length"), py::arg("amplitude"), py::arg("seed"),
        py::arg("sample_rate") = 16000);

  py::class_<LatentGrid>(m, "LatentGrid")
      .def(py::init([](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        if (a.ndim() != 2) throw DimensionError("latent grid must be 2-D (frames x channels)");
        return LatentGrid(a.shape(0), a.shape(1), from_array(a));
      }))
      .def_readonly("frames", &LatentGrid::frames)
      .def_readonly("channels", &LatentGrid::channels)
      .def("numpy", [](const LatentGrid& z) {
        return to_array(z.values, {static_cast<py::ssize_t>(z.frames), static_cast<py::ssize_t>(z.channels)});
      });

  py::class_<CodecModel>(m, "Codec")
      .def_static("load", [](const std::filesystem::path& p) { return CodecModel::from_checkpoint(read_checkpoint(p)); })
      .def_static("init", [](std::uint64_t seed) { return init_codec(CodecConfig{}, seed); }, py::arg("seed") = 7)
      .def("encode", [](const CodecModel& c, const AudioClip& x) { return encode(x, c); })
      .def("decode", [](const CodecModel& c, const LatentGrid& z) { return decode(z, c); })
      .def("save", [](const CodecModel& c, const std::filesystem::path& p) { write_checkpoint(c.to_checkpoint(), p); });

  py::class_<ClassifierModel>(m, "Classifier")
      .def_static("load",
                  [](const std::filesystem::path& p) { return ClassifierModel::from_checkpoint(read_checkpoint(p)); })
      .def_readonly("class_names", &ClassifierModel::class_names)
      .def("logits", [](const ClassifierModel& c, const LatentGrid& z) { return logits(z, c); })
      .def("probabilities", [](const ClassifierModel& c, const LatentGrid& z) { return classify(z, c); })
      .def("predict", [](const ClassifierModel& c, const LatentGrid& z) { return predict(z, c); });

  m.def("snr_db", &reconstruction_snr, py::arg("original"), py::arg("reconstruction"));

  py::class_<AttributionMap>(m, "AttributionMap")
      .def_readonly("rows", &AttributionMap::rows)
      .def_readonly("cols", &AttributionMap::cols)
      .def_readonly("target_class", &AttributionMap::target_class)
      .def_readonly("method", &AttributionMap::method)
      .def("total", &AttributionMap::total)
      .def("numpy", [](const AttributionMap& a) {
        return to_array(a.scores, {static_cast<py::ssize_t>(a.rows), static_cast<py::ssize_t>(a.cols)});
      });

  m.def("base_latent", &make_base_latent, py::arg("codec"), py::arg("length"), py::arg("seed") = 4,
        py::arg("amplitude") = 0.1);
  m.def("latent_ig", &integrated_gradients_latent, py::arg("z"), py::arg("baseline"), py::arg("classifier"),
        py::arg("target"), py::arg("steps") = 64);
  m.def("input_ig", &integrated_gradients_input, py::arg("clip"), py::arg("baseline"), py::arg("codec"),
        py::arg("classifier"), py::arg("target"), py::arg("steps") = 64);
  m.def("random_attribution", &random_attribution, py::arg("rows"), py::arg("cols"), py::arg("seed"),
        py::arg("method") = AttributionMethod::RandomLatent);

  py::class_<SelectionMask>(m, "SelectionMask")
      .def_readonly("rows", &SelectionMask::rows)
      .def_readonly("cols", &SelectionMask::cols)
      .def("count", &SelectionMask::count)
      .def("indices", &SelectionMask::indices);
  m.def(
      "select_top",
      [](const AttributionMap& a, double ratio, SelectionMode mode) { return select_top(a, ratio, mode); },
      py::arg("attribution"), py::arg("ratio"), py::arg("mode") = SelectionMode::KeepTop);
  m.def("apply_keep", &apply_mask_keep, py::arg("z"), py::arg("mask"), py::arg("base"));
  m.def("apply_remove", &apply_mask_remove, py::arg("z"), py::arg("mask"), py::arg("base"));
  m.def("synthesize", &synthesize_explanation, py::arg("z_masked"), py::arg("codec"));

  // Pipeline stages; overrides use the CLI's "a.b=value" form.
  m.def("default_config", [] { return RunConfig{}.to_json().dump(); });
  m.def(
      "config_hash", [](const py::object& overrides) { return config_from(overrides).hash(); },
      py::arg("overrides") = py::none());
  auto stage = [&m](const char* name, StageResult (*fn)(const RunConfig&)) {
    m.def(
        name, [fn](const py::object& overrides) { return fn(config_from(overrides)).summary; },
        py::arg("overrides") = py::none());
  };
  stage("synth_data", &run_synth_data);
  m.def(
      "train_codec", [](const py::object& overrides) { return run_train_codec(config_from(overrides)).summary; },
      py::arg("overrides") = py::none());
  auto task_stage = [&m](const char* name, StageResult (*fn)(const RunConfig&, TaskKind)) {
    m.def(
        name, [fn](TaskKind task, const py::object& overrides) { return fn(config_from(overrides), task).summary; },
        py::arg("task"), py::arg("overrides") = py::none());
  };
  task_stage("train_classifier", &run_train_classifier);
  task_stage("eval_fidelity", &run_eval_fidelity);
  task_stage("eval_drop", &run_eval_drop);
  task_stage("confusion", &run_confusion);
}
