// SPDX-License-Identifier: Apache-2.0

//! Vehicle-view LiDAR synthesis from roadside point clouds.
//!
//! A roadside frame (world-frame cloud plus 3D box labels) is re-expressed in
//! the frame of a virtual sensor mounted on any labelled vehicle. Non-ground
//! returns are re-cast ray by ray against local planes fitted around the
//! nearest source point; ground returns come from one global ground plane and
//! are suppressed behind occupied sectors. [`pipeline`] ties the stages
//! together, [`synth`] provides analytic scenes and an exact ray caster for
//! checking the result.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod error;
pub mod geometry;
pub mod ground;
pub mod io;
pub mod labels;
pub mod lidar;
pub mod metrics;
pub mod pipeline;
pub mod plane;
pub mod resample;
pub mod spatial;
pub mod synth;
