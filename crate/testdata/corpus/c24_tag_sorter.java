class TagSorter {
    private List<Tag> mTags;
    private String mName;

    void describe() {
        mName = mName.trim();
    }

    public void arrange(Tag tag) {
        if (tag == null) {
            return;
        }
        // <start>
        list.add(tag);
        Collections.sort(list);
        // <end>
    }
}
