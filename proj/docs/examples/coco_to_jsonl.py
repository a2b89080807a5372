#!/usr/bin/env python3
"""Convert COCO-format detections and annotations to bayescal JSONL.

Detections are the standard COCO results list
  [{"image_id": ..., "category_id": ..., "bbox": [x, y, w, h], "score": ...}, ...]
and annotations the COCO instances file. Boxes are absolute pixels and are
normalized to relative center/size with the image dimensions from the
annotation file.

Example (pedestrians = COCO category 1):
  python3 coco_to_jsonl.py --annotations instances_val2017.json \
      --detections results.json --category 1 \
      --out-dets dets.jsonl --out-gts gts.jsonl
"""

import argparse
import json


def clamp(value, lo, hi):
    return max(lo, min(hi, value))


def to_record(image, bbox):
    x, y, w, h = bbox
    width = float(image["width"])
    height = float(image["height"])
    w = clamp(w / width, 1e-6, 1.0)
    h = clamp(h / height, 1e-6, 1.0)
    cx = clamp((x + bbox[2] / 2.0) / width, 0.0, 1.0)
    cy = clamp((y + bbox[3] / 2.0) / height, 0.0, 1.0)
    return cx, cy, w, h


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--annotations", required=True)
    parser.add_argument("--detections", required=True)
    parser.add_argument("--category", type=int, required=True)
    parser.add_argument("--out-dets", required=True)
    parser.add_argument("--out-gts", required=True)
    args = parser.parse_args()

    with open(args.annotations) as f:
        instances = json.load(f)
    images = {img["id"]: img for img in instances["images"]}

    with open(args.out_gts, "w") as out:
        n_gts = 0
        for ann in instances["annotations"]:
            if ann["category_id"] != args.category or ann.get("iscrowd"):
                continue
            image = images[ann["image_id"]]
            cx, cy, w, h = to_record(image, ann["bbox"])
            out.write(json.dumps({"image_id": str(ann["image_id"]), "cx": cx, "cy": cy,
                                  "w": w, "h": h}) + "\n")
            n_gts += 1

    with open(args.detections) as f:
        detections = json.load(f)
    with open(args.out_dets, "w") as out:
        n_dets = 0
        for det in detections:
            if det["category_id"] != args.category:
                continue
            image = images.get(det["image_id"])
            if image is None:
                continue
            cx, cy, w, h = to_record(image, det["bbox"])
            score = clamp(float(det["score"]), 0.0, 1.0)
            out.write(json.dumps({"image_id": str(det["image_id"]), "score": score,
                                  "cx": cx, "cy": cy, "w": w, "h": h}) + "\n")
            n_dets += 1

    print(f"wrote {n_dets} detections and {n_gts} ground truths")


if __name__ == "__main__":
    main()
