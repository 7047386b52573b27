# UI components