"""
Quick script to regenerate Markdown reports from existing verify_report.json outputs
"""
import json
import sys
from pathlib import Path

from tool import VerifyReport


def convert_json_to_markdown(json_path):
    """Convert a verify report JSON file to Markdown"""
    json_path = Path(json_path)

    # Load JSON
    with open(json_path, 'r', encoding='utf-8') as f:
        data = json.load(f)

    report = VerifyReport.from_dict(data)

    # Save markdown
    markdown_path = json_path.with_suffix('.md')
    report.save_to_markdown(str(markdown_path))

    return markdown_path


if __name__ == "__main__":
    # Convert every verify report under the output directory
    output_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "output")

    for json_file in output_dir.rglob("verify_report.json"):
        try:
            md_path = convert_json_to_markdown(json_file)
            print(f"[OK] Created: {md_path}")
        except Exception as e:
            print(f"[ERROR] Failed {json_file}: {e}")
