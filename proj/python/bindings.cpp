#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evtraj/checkpoint.hpp"
#include "evtraj/dataset.hpp"
#include "evtraj/error.hpp"
#include "evtraj/eval.hpp"
#include "evtraj/io.hpp"
#include "evtraj/sampling.hpp"
#include "evtraj/seed.hpp"
#include "evtraj/tracker.hpp"

namespace py = pybind11;
using namespace evtraj;

namespace {

// (N, 3) float64 array of x, y, t_us.
py::array_t<double> points_array(const std::vector<TrackPoint>& points) {
  py::array_t<double> out({static_cast<py::ssize_t>(points.size()), py::ssize_t{3}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < points.size(); ++i) {
    a(i, 0) = points[i].x;
    a(i, 1) = points[i].y;
    a(i, 2) = static_cast<double>(points[i].t_us);
  }
  return out;
}

std::vector<TrackPoint> points_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& in) {
  if (in.ndim() != 2 || in.shape(1) != 3) throw InvalidArgument("expected an (N, 3) array of x, y, t_us");
  auto a = in.unchecked<2>();
  std::vector<TrackPoint> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    out[i] = {a(i, 0), a(i, 1), static_cast<std::int64_t>(a(i, 2))};
  }
  return out;
}

// (N, 4) int64 array of x, y, t_us, polarity.
py::array_t<std::int64_t> events_array(const std::vector<Event>& events) {
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(events.size()), py::ssize_t{4}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < events.size(); ++i) {
    a(i, 0) = events[i].x;
    a(i, 1) = events[i].y;
    a(i, 2) = events[i].t_us;
    a(i, 3) = events[i].polarity ? 1 : 0;
  }
  return out;
}

std::vector<Event> events_from_array(const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& in) {
  if (in.ndim() != 2 || in.shape(1) != 4) throw InvalidArgument("expected an (N, 4) array of x, y, t_us, p");
  auto a = in.unchecked<2>();
  std::vector<Event> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    if (a(i, 0) < 0 || a(i, 0) >= kSensorWidth || a(i, 1) < 0 || a(i, 1) >= kSensorHeight) {
      throw InvalidArgument("event outside the sensor");
    }
    out[i] = {static_cast<std::uint16_t>(a(i, 0)), static_cast<std::uint16_t>(a(i, 1)), a(i, 2), a(i, 3) != 0};
  }
  return out;
}

SamplingStrategy strategy(const std::string& kind, double value) {
  SamplingStrategy s;
  if (kind == "spatial") {
    s = Spatial{value};
  } else if (kind == "fixed") {
    s = FixedRate{value};
  } else {
    throw InvalidArgument("strategy must be 'spatial' or 'fixed'");
  }
  validate(s);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-camera trajectory simulation, tracking, sampling and seq2seq prediction";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.attr("SENSOR_WIDTH") = kSensorWidth;
  m.attr("SENSOR_HEIGHT") = kSensorHeight;

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"), py::arg("index") = 0);

  m.def(
      "simulate",
      [](std::uint64_t seed, std::size_t index, double noise_rate) {
        CorpusSpec spec;
        spec.seed = seed;
        spec.sim.noise_rate = noise_rate;
        const auto s = simulate_source_events(spec, index);
        std::vector<TrackPoint> truth;
        for (const auto& b : s.truth) truth.push_back({b.position.x, b.position.y, std::llround(b.time * 1e6)});
        return py::make_tuple(events_array(s.events), points_array(truth));
      },
      py::arg("seed"), py::arg("index") = 0, py::arg("noise_rate") = 0.0,
      "Events (N, 4) and true centres (M, 3) of one simulated throw.");

  m.def(
      "track",
      [](const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& events, double roi_size,
         std::size_t accum_threshold) {
        const auto ev = events_from_array(events);
        std::vector<TrackPoint> pts;
        {
          py::gil_scoped_release release;
          pts = track_stream(ev, roi_size, accum_threshold);
          round_to_track_precision(pts);
        }
        return points_array(pts);
      },
      py::arg("events"), py::arg("roi_size") = kDefaultRoiSize, py::arg("accum_threshold") = kDefaultAccumThreshold,
      "Tracker centres (N, 3), rounded to the f32 grid that track files store.");

  m.def(
      "subsample",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, const std::string& kind,
         double value) { return points_array(subsample(points_from_array(points), strategy(kind, value)).points); },
      py::arg("points"), py::arg("strategy"), py::arg("value"),
      "Greedy sub-sampling; strategy 'spatial' (value = D px) or 'fixed' (value = F ms).");

  m.def(
      "mean_rate",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
        const auto r = mean_rate(SampledSequence{points_from_array(points), Spatial{1}});
        return py::make_tuple(r.mean_hz, r.std_hz);
      },
      py::arg("points"), "(mean, std) of per-gap instantaneous rates in Hz.");

  m.def(
      "flip",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
        return points_array(flip_augment(SampledSequence{points_from_array(points), Spatial{1}}).points);
      },
      py::arg("points"));

  m.def(
      "error_decompose",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prediction,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& truth) {
        const auto e = error_decompose(points_from_array(prediction), points_from_array(truth));
        return py::make_tuple(e.spatial_rmse_px, e.temporal_rmse_ms);
      },
      py::arg("prediction"), py::arg("truth"), "(spatial RMSE px, temporal RMSE ms).");

  m.def(
      "load_track", [](const std::filesystem::path& path) { return points_array(load_track(path)); },
      py::arg("path"));
  m.def(
      "save_track",
      [](const std::filesystem::path& path, const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
        save_track(path, points_from_array(points), format_for_path(path));
      },
      py::arg("path"), py::arg("points"));

  py::class_<Seq2SeqModel>(m, "Model")
      .def_static("initialized", &Seq2SeqModel::initialized, py::arg("seed"), py::arg("hidden_size") = kDefaultHidden)
      .def_property_readonly("hidden_size", [](const Seq2SeqModel& model) { return model.params.hidden_size(); })
      .def_property_readonly("parameter_count",
                             [](const Seq2SeqModel& model) { return model.params.parameter_count(); })
      .def(
          "predict",
          [](const Seq2SeqModel& model, const py::array_t<double, py::array::c_style | py::array::forcecast>& recent,
             Index w_in, Index w_out) { return points_array(predict(model, points_from_array(recent), w_in, w_out)); },
          py::arg("recent"), py::arg("w_in"), py::arg("w_out"),
          "Predicts w_out future (x, y, arrival t_us) rows from the last w_in rows of `recent`.");

  m.def(
      "load_model",
      [](const std::filesystem::path& path) {
        auto loaded = load_model(path);
        py::dict meta;
        meta["w_in"] = loaded.meta.w_in;
        meta["w_out"] = loaded.meta.w_out;
        meta["strategy"] = loaded.meta.strategy;
        meta["seed"] = loaded.meta.seed;
        meta["epochs"] = loaded.meta.train.epochs;
        return py::make_tuple(std::move(loaded.model), meta);
      },
      py::arg("path"), "(Model, metadata dict) from a checkpoint and its JSON sidecar.");
}
